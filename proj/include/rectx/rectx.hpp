#pragma once

#include "rectx/condition.hpp"
#include "rectx/dimacs.hpp"
#include "rectx/error.hpp"
#include "rectx/explainer.hpp"
#include "rectx/forest_io.hpp"
#include "rectx/learner.hpp"
#include "rectx/logic.hpp"
#include "rectx/metrics.hpp"
#include "rectx/miner.hpp"
#include "rectx/pipeline.hpp"
#include "rectx/rectifier.hpp"
#include "rectx/rules.hpp"
#include "rectx/tabular.hpp"
#include "rectx/theory.hpp"
#include "rectx/tree.hpp"
