#pragma once

#include "tegnas/netgen/arch.hpp"
#include "tegnas/netgen/mlp.hpp"
#include "tegnas/netgen/net.hpp"
#include "tegnas/netgen/space.hpp"
