#pragma once

#include "radlab/classifier.hpp"
#include "radlab/commands.hpp"
#include "radlab/config.hpp"
#include "radlab/criteria.hpp"
#include "radlab/finite_difference.hpp"
#include "radlab/format.hpp"
#include "radlab/function_expr.hpp"
#include "radlab/problem.hpp"
#include "radlab/quadrature.hpp"
#include "radlab/radial_solver.hpp"
#include "radlab/verify.hpp"
