#pragma once

#include "reclab/core.hpp"
#include "reclab/params.hpp"
#include "reclab/environment.hpp"
#include "reclab/recommender.hpp"
#include "reclab/envs/registry.hpp"
#include "reclab/recs/registry.hpp"
#include "reclab/explore.hpp"
#include "reclab/metrics.hpp"
#include "reclab/tuning.hpp"
#include "reclab/harness.hpp"
#include "reclab/dataio/ml100k.hpp"
