#pragma once

#include "gimvi/conditions.hpp"
#include "gimvi/discrete.hpp"
#include "gimvi/dynamics.hpp"
#include "gimvi/moduli.hpp"
#include "gimvi/problem.hpp"
#include "gimvi/prox.hpp"
#include "gimvi/rate_fit.hpp"
#include "gimvi/residual.hpp"
#include "gimvi/schedule.hpp"
#include "gimvi/trace.hpp"
#include "gimvi/types.hpp"
