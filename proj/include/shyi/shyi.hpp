#pragma once

#include "shyi/attention_map.hpp"
#include "shyi/config.hpp"
#include "shyi/error.hpp"
#include "shyi/gradcheck.hpp"
#include "shyi/guidance.hpp"
#include "shyi/hypergraph.hpp"
#include "shyi/hypergraph_json.hpp"
#include "shyi/losses.hpp"
#include "shyi/metrics.hpp"
#include "shyi/pairs.hpp"
#include "shyi/pairs_json.hpp"
#include "shyi/prompt_parser.hpp"
#include "shyi/random_instances.hpp"
#include "shyi/schedule.hpp"
#include "shyi/similarity.hpp"
#include "shyi/smoothing.hpp"
#include "shyi/toy_model.hpp"
