#pragma once

#include "agbench/climate.hpp"
#include "agbench/config.hpp"
#include "agbench/dataset.hpp"
#include "agbench/evaluate.hpp"
#include "agbench/featurize.hpp"
#include "agbench/harmonics.hpp"
#include "agbench/indices.hpp"
#include "agbench/models.hpp"
#include "agbench/synth.hpp"
