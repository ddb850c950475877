#pragma once

#include "pha/linops.hpp"
#include "pha/precond.hpp"
#include "pha/fixpoint.hpp"
#include "pha/problems.hpp"
#include "pha/cpsolver.hpp"
#include "pha/bench.hpp"
