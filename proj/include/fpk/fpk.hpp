#pragma once

#include "fpk/analysis.hpp"
#include "fpk/chang_cooper.hpp"
#include "fpk/grid.hpp"
#include "fpk/integrators.hpp"
#include "fpk/opinion_model.hpp"
#include "fpk/problem.hpp"
#include "fpk/tridiagonal.hpp"
