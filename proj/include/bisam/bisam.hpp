#ifndef BISAM_BISAM_HPP
#define BISAM_BISAM_HPP

#include "bisam/bench.hpp"
#include "bisam/diagnostics.hpp"
#include "bisam/operators.hpp"
#include "bisam/problem.hpp"
#include "bisam/problems.hpp"
#include "bisam/rng.hpp"
#include "bisam/solvers.hpp"
#include "bisam/trace_io.hpp"

#endif
