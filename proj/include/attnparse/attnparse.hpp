#pragma once

#include "attnparse/analysis.hpp"
#include "attnparse/attention_io.hpp"
#include "attnparse/chart.hpp"
#include "attnparse/core.hpp"
#include "attnparse/distances.hpp"
#include "attnparse/ensemble.hpp"
#include "attnparse/error.hpp"
#include "attnparse/evaluation.hpp"
#include "attnparse/matrix.hpp"
#include "attnparse/parallel.hpp"
#include "attnparse/synthetic.hpp"
#include "attnparse/topdown.hpp"
#include "attnparse/treebank.hpp"
