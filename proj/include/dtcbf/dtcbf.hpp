#pragma once

#include "dtcbf/barrier.hpp"
#include "dtcbf/car.hpp"
#include "dtcbf/car_env.hpp"
#include "dtcbf/config.hpp"
#include "dtcbf/control.hpp"
#include "dtcbf/double_integrator.hpp"
#include "dtcbf/dynamics.hpp"
#include "dtcbf/errors.hpp"
#include "dtcbf/fixed_wing.hpp"
#include "dtcbf/fw_env.hpp"
#include "dtcbf/harness.hpp"
#include "dtcbf/params.hpp"
#include "dtcbf/policies.hpp"
#include "dtcbf/rng.hpp"
#include "dtcbf/safety_filter.hpp"
#include "dtcbf/shielded_env.hpp"
#include "dtcbf/step_result.hpp"
#include "dtcbf/verify.hpp"
