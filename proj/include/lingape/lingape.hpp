#pragma once

// Everything in one include.
#include "lingape/error.hpp"
#include "lingape/linalg.hpp"
#include "lingape/model.hpp"
#include "lingape/estimator.hpp"
#include "lingape/simplex.hpp"
#include "lingape/allocation.hpp"
#include "lingape/algorithms.hpp"
#include "lingape/complexity.hpp"
#include "lingape/bench.hpp"
