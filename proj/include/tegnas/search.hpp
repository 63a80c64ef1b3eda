#pragma once

#include "tegnas/search/evaluator.hpp"
#include "tegnas/search/policy.hpp"
#include "tegnas/search/reward.hpp"
#include "tegnas/search/run.hpp"
