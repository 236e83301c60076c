#pragma once

#include "lse/checkpoint.hpp"
#include "lse/error.hpp"
#include "lse/evaluation.hpp"
#include "lse/filter_index.hpp"
#include "lse/kg_data.hpp"
#include "lse/losses.hpp"
#include "lse/models.hpp"
#include "lse/profiles.hpp"
#include "lse/relation_stats.hpp"
#include "lse/report.hpp"
#include "lse/rng.hpp"
#include "lse/sampling.hpp"
#include "lse/synth.hpp"
#include "lse/training.hpp"
