#include "cli/app.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <map>
#include <set>
#include <variant>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli/format.hpp"
#include "mcqkd/mcqkd.hpp"

namespace mcqkd::cli {
namespace {

using nlohmann::json;

constexpr double inf = std::numeric_limits<double>::infinity();

struct SlotSpec {
    double gain;
    double noise;
    double eve_variance = 1.0;
};

struct EnsembleSpec {
    std::optional<std::vector<SlotSpec>> slots;
    std::size_t n = 8;
    std::optional<std::size_t> l;
    double gain = 0.5;
    double noise = 0.25;
    double eve_variance = 1.0;
    double nu_eve = inf;
    bool given = false;

    ChannelEnsemble build() const
    {
        if (slots) {
            std::vector<SubChannel> v;
            for (const auto& s : *slots) v.push_back(SubChannel::from_gain(s.gain, s.noise, s.eve_variance));
            return ChannelEnsemble::build(std::move(v), nu_eve);
        }
        const std::size_t used = l.value_or(n);
        detail::require(n >= 1 && used <= n, "need 1 <= subchannels and l <= subchannels");
        std::vector<SubChannel> v;
        for (std::size_t i = 0; i < n; ++i)
            v.push_back(SubChannel::from_gain(i < used ? gain : 0.0, noise, eve_variance));
        return ChannelEnsemble::build(std::move(v), nu_eve);
    }
};

struct Sweep {
    std::string axis;
    double lo = 0.0, hi = 0.0;
    std::size_t steps = 0;

    std::vector<double> values() const
    {
        std::vector<double> v;
        for (std::size_t i = 0; i < steps; ++i)
            v.push_back(steps == 1 ? lo : lo + (hi - lo) * double(i) / double(steps - 1));
        return v;
    }
};

struct RunConfig {
    ProtocolConfig protocol;
    EnsembleSpec ensemble;
    std::optional<Sweep> sweep;
    std::string format = "csv";
    std::optional<std::string> out_path;
    std::size_t users = 2;
    std::optional<std::vector<double>> eve_terms;
    std::optional<std::vector<double>> svd_v;
    Allocation allocation = Allocation::uniform;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
};

// ---- parsing helpers ----

Direction parse_direction(const std::string& s)
{
    if (s == "one_way") return Direction::one_way;
    if (s == "two_way") return Direction::two_way;
    throw config_error("unknown protocol direction: " + s);
}

Measurement parse_measurement(const std::string& s)
{
    if (s == "hom" || s == "homodyne") return Measurement::homodyne;
    if (s == "het" || s == "heterodyne") return Measurement::heterodyne;
    throw config_error("unknown measurement: " + s);
}

Reconciliation parse_reconciliation(const std::string& s)
{
    if (s == "rr" || s == "reverse") return Reconciliation::reverse;
    if (s == "dr" || s == "direct") return Reconciliation::direct;
    throw config_error("unknown reconciliation: " + s);
}

Allocation parse_allocation(const std::string& s)
{
    if (s == "uniform") return Allocation::uniform;
    if (s == "waterfill") return Allocation::waterfill;
    throw config_error("unknown allocation: " + s);
}

QuadratureConvention parse_convention(const std::string& s)
{
    if (s == "real") return QuadratureConvention::real;
    if (s == "complex") return QuadratureConvention::complex;
    throw config_error("unknown quadrature convention: " + s);
}

Sweep parse_sweep(const std::string& s)
{
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 4) throw config_error("sweep must look like axis:lo:hi:steps");
    Sweep w;
    w.axis = parts[0];
    w.lo = std::stod(parts[1]);
    w.hi = std::stod(parts[2]);
    const long steps = std::stol(parts[3]);
    if (steps < 0) throw config_error("sweep steps must be non-negative");
    w.steps = std::size_t(steps);
    return w;
}

// integral values stay integers so counts and indices read naturally
json number_json(double x)
{
    if (!std::isfinite(x)) return json(format_number(x));
    const double r = rounded(x);
    if (r == std::trunc(r) && std::abs(r) < 9e15) return json(static_cast<std::int64_t>(r));
    return json(r);
}

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) throw config_error("config section '" + section + "' must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) throw config_error("unknown field '" + k + "' in config section '" + section + "'");
}

void load_config(const std::string& path, RunConfig& rc)
{
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config file " + path);
    const json j = json::parse(in);
    check_keys(j, "top level",
               {"schema_version", "protocol", "ensemble", "sweep", "output", "region", "seed", "trials"});
    if (!j.contains("schema_version") || j.at("schema_version") != "1")
        throw config_error("unsupported or missing schema_version (expected \"1\")");

    auto& p = rc.protocol;
    if (j.contains("protocol")) {
        const auto& s = j.at("protocol");
        check_keys(s, "protocol",
                   {"direction", "measurement", "reconciliation", "single_carrier_variance", "modulation_variance",
                    "squeezing", "shot_noise", "beam_splitter", "vacuum_noise", "quadrature_convention", "t_bar",
                    "w_bar", "rr_het_form", "twoway_rr_het_numerator", "strict_splits", "gamma_split",
                    "allocation"});
        if (s.contains("direction")) p.direction = parse_direction(s.at("direction"));
        if (s.contains("measurement")) p.measurement = parse_measurement(s.at("measurement"));
        if (s.contains("reconciliation")) p.reconciliation = parse_reconciliation(s.at("reconciliation"));
        if (s.contains("single_carrier_variance")) p.single_carrier_variance = s.at("single_carrier_variance");
        if (s.contains("modulation_variance")) p.modulation_variance = s.at("modulation_variance");
        if (s.contains("squeezing")) p.squeezing = s.at("squeezing");
        if (s.contains("shot_noise")) p.shot_noise = s.at("shot_noise");
        if (s.contains("beam_splitter")) p.beam_splitter = s.at("beam_splitter");
        if (s.contains("vacuum_noise")) p.vacuum_noise = s.at("vacuum_noise");
        if (s.contains("quadrature_convention"))
            p.quadrature_convention = parse_convention(s.at("quadrature_convention"));
        if (s.contains("t_bar")) p.t_bar = s.at("t_bar").get<double>();
        if (s.contains("w_bar")) p.w_bar = s.at("w_bar").get<double>();
        if (s.contains("rr_het_form")) {
            const std::string f = s.at("rr_het_form");
            if (f != "standard" && f != "alternate") throw config_error("unknown rr_het_form: " + f);
            p.rr_het_form = f == "standard" ? RrHetForm::standard : RrHetForm::alternate;
        }
        if (s.contains("twoway_rr_het_numerator")) {
            const std::string f = s.at("twoway_rr_het_numerator");
            if (f != "literal" && f != "linear") throw config_error("unknown twoway_rr_het_numerator: " + f);
            p.twoway_rr_het_numerator = f == "literal" ? TwoWayRrHetNumerator::literal : TwoWayRrHetNumerator::linear;
        }
        if (s.contains("strict_splits")) p.strict_splits = s.at("strict_splits");
        if (s.contains("gamma_split")) p.gamma_split = s.at("gamma_split").get<std::array<double, 3>>();
        if (s.contains("allocation")) rc.allocation = parse_allocation(s.at("allocation"));
    }

    if (j.contains("ensemble")) {
        const auto& s = j.at("ensemble");
        check_keys(s, "ensemble", {"slots", "n", "l", "gain", "noise", "eve_variance", "nu_eve"});
        auto& e = rc.ensemble;
        e.given = true;
        if (s.contains("slots")) {
            std::vector<SlotSpec> slots;
            for (const auto& x : s.at("slots")) {
                check_keys(x, "ensemble.slots", {"gain", "noise", "eve_variance"});
                slots.push_back({x.at("gain"), x.at("noise"), x.value("eve_variance", 1.0)});
            }
            e.slots = std::move(slots);
        }
        if (s.contains("n")) e.n = s.at("n");
        if (s.contains("l")) e.l = s.at("l").get<std::size_t>();
        if (s.contains("gain")) e.gain = s.at("gain");
        if (s.contains("noise")) e.noise = s.at("noise");
        if (s.contains("eve_variance")) e.eve_variance = s.at("eve_variance");
        if (s.contains("nu_eve")) e.nu_eve = s.at("nu_eve");
    }

    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        check_keys(s, "sweep", {"axis", "lo", "hi", "steps"});
        rc.sweep = Sweep{s.at("axis"), s.at("lo"), s.at("hi"), s.at("steps")};
    }
    if (j.contains("output")) {
        const auto& s = j.at("output");
        check_keys(s, "output", {"format", "path"});
        if (s.contains("format")) rc.format = s.at("format");
        if (s.contains("path")) rc.out_path = s.at("path").get<std::string>();
    }
    if (j.contains("region")) {
        const auto& s = j.at("region");
        check_keys(s, "region", {"users", "eve_terms", "svd_v"});
        if (s.contains("users")) rc.users = s.at("users");
        if (s.contains("eve_terms")) rc.eve_terms = s.at("eve_terms").get<std::vector<double>>();
        if (s.contains("svd_v")) rc.svd_v = s.at("svd_v").get<std::vector<double>>();
    }
    if (j.contains("seed")) rc.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("trials")) rc.trials = j.at("trials").get<std::size_t>();
}

// ---- flags shared by every command ----

struct Flags {
    std::string config, protocol, measurement, reconciliation, sweep, format, out, alloc, variant, quantity;
    double tbar = 0, eve_variance = 0, mod_variance = 0, noise = 0, nu_eve = 0;
    std::size_t subchannels = 0, users = 0, trials = 0;
    std::uint64_t seed = 0;
    std::vector<double> svd_v;
    bool all = false;
    std::map<std::string, CLI::Option*> opt;

    bool has(const std::string& name) const
    {
        auto it = opt.find(name);
        return it != opt.end() && it->second->count() > 0;
    }
};

void add_flags(CLI::App* c, Flags& f)
{
    f.opt["config"] = c->add_option("--config", f.config, "JSON run configuration");
    f.opt["protocol"] =
        c->add_option("--protocol", f.protocol, "one_way or two_way")->check(CLI::IsMember({"one_way", "two_way"}));
    f.opt["measurement"] = c->add_option("--measurement", f.measurement, "hom or het")
                               ->check(CLI::IsMember({"hom", "het", "homodyne", "heterodyne"}));
    f.opt["reconciliation"] = c->add_option("--reconciliation", f.reconciliation, "rr or dr")
                                  ->check(CLI::IsMember({"rr", "dr", "reverse", "direct"}));
    f.opt["tbar"] = c->add_option("--tbar", f.tbar, "averaged sub-channel gain");
    f.opt["eve-variance"] = c->add_option("--eve-variance", f.eve_variance, "Eve's EPR variance W");
    f.opt["mod-variance"] = c->add_option("--mod-variance", f.mod_variance, "single-carrier modulation variance");
    f.opt["noise"] = c->add_option("--noise", f.noise, "sub-channel noise variance");
    f.opt["subchannels"] = c->add_option("--subchannels", f.subchannels, "number of sub-channels");
    f.opt["nu-eve"] = c->add_option("--nu-eve", f.nu_eve, "selection threshold");
    f.opt["sweep"] = c->add_option("--sweep", f.sweep, "axis:lo:hi:steps");
    f.opt["format"] = c->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    f.opt["out"] = c->add_option("--out", f.out, "output file (default stdout)");
    f.opt["seed"] = c->add_option("--seed", f.seed, "RNG seed");
    f.opt["trials"] = c->add_option("--trials", f.trials, "Monte Carlo trials");
    f.opt["alloc"] =
        c->add_option("--alloc", f.alloc, "uniform or waterfill")->check(CLI::IsMember({"uniform", "waterfill"}));
    f.opt["svd-v"] = c->add_option("--svd-v", f.svd_v, "comma-separated SVD gains")->delimiter(',');
    f.opt["users"] = c->add_option("--users", f.users, "number of MQA users");
    f.opt["variant"] = c->add_option("--variant", f.variant, "closed-form threshold variant")
                           ->check(CLI::IsMember({"rr_one_way_single", "dr_one_way_single", "rr_two_way_single",
                                                  "dr_two_way_single"}));
    f.opt["quantity"] = c->add_option("--quantity", f.quantity, "eve_variance or excess_noise")
                            ->check(CLI::IsMember({"eve_variance", "excess_noise"}));
    f.opt["all"] = c->add_flag("--all", f.all, "every protocol variant");
}

RunConfig resolve(const Flags& f)
{
    RunConfig rc;
    if (f.has("config")) load_config(f.config, rc);
    auto& p = rc.protocol;
    if (f.has("protocol")) p.direction = parse_direction(f.protocol);
    if (f.has("measurement")) p.measurement = parse_measurement(f.measurement);
    if (f.has("reconciliation")) p.reconciliation = parse_reconciliation(f.reconciliation);
    if (f.has("tbar")) {
        p.t_bar = f.tbar;
        rc.ensemble.gain = f.tbar;
    }
    if (f.has("eve-variance")) {
        p.w_bar = f.eve_variance;
        rc.ensemble.eve_variance = f.eve_variance;
    }
    if (f.has("mod-variance")) {
        p.single_carrier_variance = f.mod_variance;
        p.modulation_variance = f.mod_variance;
    }
    if (f.has("noise")) {
        rc.ensemble.noise = f.noise;
        rc.ensemble.given = true;
    }
    if (f.has("subchannels")) {
        rc.ensemble.n = f.subchannels;
        rc.ensemble.l.reset();
        rc.ensemble.given = true;
    }
    if (f.has("nu-eve")) rc.ensemble.nu_eve = f.nu_eve;
    if (f.has("sweep")) rc.sweep = parse_sweep(f.sweep);
    if (f.has("format")) rc.format = f.format;
    if (f.has("out")) rc.out_path = f.out;
    if (f.has("seed")) rc.seed = f.seed;
    if (f.has("trials")) rc.trials = f.trials;
    if (f.has("alloc")) rc.allocation = parse_allocation(f.alloc);
    if (f.has("svd-v")) rc.svd_v = f.svd_v;
    if (f.has("users")) rc.users = f.users;
    if (rc.format != "csv" && rc.format != "json") throw config_error("unknown output format: " + rc.format);
    return rc;
}

// ---- tables ----

using Cell = std::variant<double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    std::string render(const std::string& format) const
    {
        std::ostringstream o;
        if (format == "json") {
            json arr = json::array();
            for (const auto& r : rows) {
                json obj = json::object();
                for (std::size_t i = 0; i < columns.size(); ++i) {
                    if (const auto* d = std::get_if<double>(&r[i]))
                        obj[columns[i]] = number_json(*d);
                    else
                        obj[columns[i]] = std::get<std::string>(r[i]);
                }
                arr.push_back(obj);
            }
            o << arr.dump(2) << '\n';
            return o.str();
        }
        for (std::size_t i = 0; i < columns.size(); ++i) o << (i ? "," : "") << columns[i];
        o << '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (i) o << ',';
                if (const auto* d = std::get_if<double>(&r[i]))
                    o << format_number(*d);
                else
                    o << std::get<std::string>(r[i]);
            }
            o << '\n';
        }
        return o.str();
    }
};

std::string method_name(Method m)
{
    switch (m) {
    case Method::closed_form: return "closed_form";
    case Method::bisection: return "bisection";
    case Method::reference: return "reference";
    }
    return "unknown";
}

std::string status_name(ThresholdStatus s)
{
    switch (s) {
    case ThresholdStatus::ok: return "ok";
    case ThresholdStatus::no_positive_rate: return "no_positive_rate";
    case ThresholdStatus::unbounded: return "unbounded";
    }
    return "unknown";
}

class Warnings {
public:
    explicit Warnings(std::ostream& err) : err_(err) {}
    void add(const std::vector<std::string>& w)
    {
        for (const auto& s : w)
            if (seen_.insert(s).second) err_ << "warning: " << s << '\n';
    }

private:
    std::ostream& err_;
    std::set<std::string> seen_;
};

// ---- commands ----

std::string cmd_keyrate(RunConfig rc, Warnings& warn)
{
    auto& p = rc.protocol;
    p.ensemble = rc.ensemble.build();
    Table t{{"T_bar", "W_bar", "rate_bits", "rate_clamped", "info_term", "eve_term"}, {}};
    auto emit = [&](const ProtocolConfig& c) {
        const auto k = keyrate(c);
        warn.add(k.warnings);
        t.rows.push_back({k.t_bar, k.w_bar, k.rate, k.clamped(), k.info_term, k.eve_term});
    };
    if (!rc.sweep) {
        emit(p);
    } else {
        const auto& a = rc.sweep->axis;
        if (a != "t_bar" && a != "eve_variance" && a != "w_bar" && a != "mod_variance")
            throw config_error("keyrate cannot sweep over '" + a + "'");
        for (double v : rc.sweep->values()) {
            ProtocolConfig c = p;
            if (a == "t_bar")
                c.t_bar = v;
            else if (a == "mod_variance")
                c.single_carrier_variance = v;
            else
                c.w_bar = v;
            emit(c);
        }
    }
    return t.render(rc.format);
}

std::vector<double> threshold_grid(const RunConfig& rc)
{
    if (rc.sweep) {
        if (rc.sweep->axis != "t_bar") throw config_error("threshold sweeps run over t_bar only");
        return rc.sweep->values();
    }
    if (rc.protocol.t_bar) return {*rc.protocol.t_bar};
    if (rc.ensemble.given) return {rc.ensemble.build().averaged_fourier_gain()};
    throw config_error("threshold needs --tbar, --sweep or an ensemble");
}

struct VariantName {
    const char* name;
    Direction d;
    Measurement m;
    Reconciliation r;
};

constexpr VariantName all_variants[] = {
    {"one_way_hom_rr", Direction::one_way, Measurement::homodyne, Reconciliation::reverse},
    {"one_way_hom_dr", Direction::one_way, Measurement::homodyne, Reconciliation::direct},
    {"one_way_het_rr", Direction::one_way, Measurement::heterodyne, Reconciliation::reverse},
    {"one_way_het_dr", Direction::one_way, Measurement::heterodyne, Reconciliation::direct},
    {"two_way_hom_rr", Direction::two_way, Measurement::homodyne, Reconciliation::reverse},
    {"two_way_hom_dr", Direction::two_way, Measurement::homodyne, Reconciliation::direct},
    {"two_way_het_rr", Direction::two_way, Measurement::heterodyne, Reconciliation::reverse},
    {"two_way_het_dr", Direction::two_way, Measurement::heterodyne, Reconciliation::direct},
};

std::string cmd_threshold(RunConfig rc, const Flags& f, Warnings& warn)
{
    if (f.has("variant")) {
        static const std::map<std::string, ClosedFormVariant> names{
            {"rr_one_way_single", ClosedFormVariant::rr_one_way_single},
            {"dr_one_way_single", ClosedFormVariant::dr_one_way_single},
            {"rr_two_way_single", ClosedFormVariant::rr_two_way_single},
            {"dr_two_way_single", ClosedFormVariant::dr_two_way_single}};
        const auto v = names.at(f.variant);
        const double n = tolerable_excess_noise_closed_form(v);
        const double residual =
            v == ClosedFormVariant::dr_one_way_single ? std::abs(dr_single_equation(n) - std::exp(2.0)) : 0.0;
        Table t{{"variant", "N_tol", "method", "residual", "status"}, {}};
        t.rows.push_back({f.variant, n, method_name(closed_form_method(v)), residual, std::string("ok")});
        return t.render(rc.format);
    }

    auto& p = rc.protocol;
    p.ensemble = rc.ensemble.build();
    const bool excess = f.has("quantity") && f.quantity == "excess_noise";
    const auto grid = threshold_grid(rc);
    std::vector<std::string> regime_warn;
    check_regime(p.single_carrier_variance, &regime_warn);
    warn.add(regime_warn);

    auto solve = [&](const ProtocolConfig& c) {
        if (!excess) return max_eve_variance(c, grid);
        std::vector<double> sorted = grid;
        std::sort(sorted.begin(), sorted.end());
        std::vector<ThresholdResult> rows;
        for (double t : sorted) {
            ProtocolConfig ct = c;
            ct.t_bar = t;
            rows.push_back(tolerable_excess_noise_multicarrier(ct));
        }
        return rows;
    };

    const std::string value_col = excess ? "N_tol" : "W_max";
    Table t;
    if (f.all) {
        t.columns = {"variant", "T_bar", value_col, "method", "residual", "status"};
        for (const auto& v : all_variants) {
            ProtocolConfig c = p;
            c.direction = v.d;
            c.measurement = v.m;
            c.reconciliation = v.r;
            for (const auto& r : solve(c))
                t.rows.push_back({std::string(v.name), r.t_bar, r.value, method_name(r.method), r.residual,
                                  status_name(r.status)});
        }
    } else {
        t.columns = {"T_bar", value_col, "method", "residual", "status"};
        for (const auto& r : solve(p))
            t.rows.push_back({r.t_bar, r.value, method_name(r.method), r.residual, status_name(r.status)});
    }
    return t.render(rc.format);
}

std::string cmd_region(const RunConfig& rc, Warnings& warn)
{
    MqaSetup s;
    s.ensemble = rc.ensemble.build();
    s.users = rc.users;
    s.modulation_variance = rc.protocol.modulation_variance;
    s.allocation = rc.allocation;
    s.vacuum_noise = rc.protocol.vacuum_noise;
    s.convention = rc.protocol.convention_or(QuadratureConvention::complex);
    const auto eve = rc.eve_terms.value_or(std::vector<double>(s.users, 0.0));

    MqaSetup used = s;
    if (rc.svd_v) {
        const auto cmp = svd_private_capacities(s, *rc.svd_v, eve);
        if (!cmp.dominance_holds)
            warn.add({"SVD gains did not raise the private sum capacity for this ensemble"});
        used = svd_transform(s, *rc.svd_v);
    }
    const auto c = capacity_region(used);
    const auto p = private_region(used, eve);
    Table t{{"user_index", "corner_C", "corner_P", "sum_C", "sym_C", "sum_P", "sym_P"}, {}};
    for (std::size_t k = 0; k < used.users; ++k)
        t.rows.push_back({double(k), c.corner_points[k], p.corner_points[k], c.sum_capacity, c.symmetric_capacity,
                          p.sum_capacity, p.symmetric_capacity});
    return t.render(rc.format);
}

json matrix_json(const Eigen::MatrixXd& m)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number_json(m(i, j)));
        a.push_back(row);
    }
    return a;
}


std::string cmd_simulate(const RunConfig& rc)
{
    if (!rc.trials || !rc.seed) throw config_error("simulate needs both --trials and --seed");
    SimulationConfig c{rc.ensemble.build(), rc.protocol.single_carrier_variance,
                       rc.protocol.convention_or(QuadratureConvention::complex)};
    const auto r = simulate_block(c, *rc.trials, *rc.seed);
    json j = json::object();
    j["trials"] = r.trials;
    j["seed"] = r.seed;
    j["rng"] = r.rng;
    j["quadrature_convention"] = r.convention == QuadratureConvention::real ? "real" : "complex";
    j["analytic_quadrature_variance"] = number_json(r.analytic_quadrature_variance);
    j["empirical_quadrature_variance"] = number_json(r.empirical_quadrature_variance);
    j["quadrature_variance_se"] = number_json(r.quadrature_variance_se);
    j["max_abs_deviation"] = number_json(r.max_abs_deviation);
    j["max_decode_error"] = number_json(r.max_decode_error);
    j["mean_subcarrier_energy"] = number_json(r.mean_subcarrier_energy);
    j["analytic_mutual_info_bits"] = number_json(r.analytic_mutual_info_bits);
    j["empirical_mutual_info_bits"] = number_json(r.empirical_mutual_info_bits);
    j["mutual_info_se"] = number_json(r.mutual_info_se);
    j["analytic_output_covariance"] = matrix_json(r.analytic_output_covariance);
    j["empirical_output_covariance"] = matrix_json(r.empirical_output_covariance);
    return j.dump(2) + "\n";
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Multicarrier CVQKD key rates, thresholds, capacity regions and simulations"};
    app.require_subcommand(1);
    Flags f;
    auto* keyrate_cmd = app.add_subcommand("keyrate", "secret key rate table");
    auto* threshold_cmd = app.add_subcommand("threshold", "tolerable excess noise or maximum Eve variance");
    auto* region_cmd = app.add_subcommand("region", "MQA capacity and private capacity region");
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo simulation of one AMQD block");
    // every subcommand takes the same flags
    std::map<CLI::App*, Flags> flags;
    for (auto* c : {keyrate_cmd, threshold_cmd, region_cmd, simulate_cmd}) add_flags(c, flags[c]);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        if (!rev.empty()) rev.pop_back();
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return exit_ok;
        }
        err << "error: " << e.what() << '\n';
        return exit_parameter;
    }

    Warnings warn(err);
    try {
        CLI::App* cmd = app.get_subcommands().front();
        const Flags& fl = flags.at(cmd);
        const RunConfig rc = resolve(fl);
        std::string data;
        if (cmd == keyrate_cmd)
            data = cmd_keyrate(rc, warn);
        else if (cmd == threshold_cmd)
            data = cmd_threshold(rc, fl, warn);
        else if (cmd == region_cmd)
            data = cmd_region(rc, warn);
        else
            data = cmd_simulate(rc);

        if (rc.out_path) {
            std::ofstream file(*rc.out_path, std::ios::binary);
            if (!file) throw config_error("cannot open output file " + *rc.out_path);
            file << data;
        } else {
            out << data;
        }
        return exit_ok;
    } catch (const regime_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_regime;
    } catch (const consistency_error& e) {
        err << "internal consistency error: " << e.what() << '\n';
        return exit_consistency;
    } catch (const state_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_parameter;
    } catch (const std::invalid_argument& e) {  // parameter_error, config_error, bad numbers
        err << "error: " << e.what() << '\n';
        return exit_parameter;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_parameter;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << '\n';
        return exit_parameter;
    } catch (const data_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_parameter;
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return exit_parameter;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return exit_consistency;
    }
}

} // namespace mcqkd::cli
