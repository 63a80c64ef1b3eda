#pragma once

#include "tegnas/bench/analysis.hpp"
#include "tegnas/bench/train.hpp"
