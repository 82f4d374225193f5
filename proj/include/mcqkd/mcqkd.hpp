#pragma once

#include "mcqkd/errors.hpp"
#include "mcqkd/gaussian_core.hpp"
#include "mcqkd/attack_model.hpp"
#include "mcqkd/channel_model.hpp"
#include "mcqkd/protocol.hpp"
#include "mcqkd/keyrate_oneway.hpp"
#include "mcqkd/keyrate_twoway.hpp"
#include "mcqkd/multiuser_mqa.hpp"
#include "mcqkd/threshold_solver.hpp"
#include "mcqkd/montecarlo_sim.hpp"
