#pragma once

#include "gossip_nash/engine.hpp"
#include "gossip_nash/experiment.hpp"
#include "gossip_nash/game.hpp"
#include "gossip_nash/gossip_matrices.hpp"
#include "gossip_nash/graph.hpp"
#include "gossip_nash/io.hpp"
#include "gossip_nash/layout.hpp"
#include "gossip_nash/rate.hpp"
#include "gossip_nash/rng.hpp"
