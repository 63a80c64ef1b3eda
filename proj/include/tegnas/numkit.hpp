#pragma once

#include "tegnas/numkit/eig.hpp"
#include "tegnas/numkit/init.hpp"
#include "tegnas/numkit/matrix.hpp"
#include "tegnas/numkit/parallel.hpp"
#include "tegnas/numkit/pca.hpp"
#include "tegnas/numkit/rng.hpp"
#include "tegnas/numkit/solve.hpp"
