// rmed.hpp: everything except the JSON experiment layer.
#pragma once

#include "rmed/divergence.hpp"
#include "rmed/duel_stats.hpp"
#include "rmed/policies.hpp"
#include "rmed/preference_matrix.hpp"
#include "rmed/rng.hpp"
#include "rmed/simulator.hpp"
