#pragma once

#include "aeval/clustering.hpp"
#include "aeval/core.hpp"
#include "aeval/corpus.hpp"
#include "aeval/graph.hpp"
#include "aeval/louvain.hpp"
#include "aeval/metrics.hpp"
#include "aeval/pipeline.hpp"
#include "aeval/proc.hpp"
#include "aeval/runner.hpp"
#include "aeval/similarity.hpp"
#include "aeval/token.hpp"
#include "aeval/winnow.hpp"
