#pragma once

#include "bootstrap.hpp"
#include "builtins.hpp"
#include "checks.hpp"
#include "error.hpp"
#include "fisher.hpp"
#include "gaussian.hpp"
#include "infotheory.hpp"
#include "io.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "regression.hpp"
#include "rng.hpp"
#include "samplers.hpp"
#include "stats.hpp"
