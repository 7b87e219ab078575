#pragma once

#include "shortpkt/analysis.hpp"
#include "shortpkt/channel.hpp"
#include "shortpkt/dd.hpp"
#include "shortpkt/errors.hpp"
#include "shortpkt/jet.hpp"
#include "shortpkt/optimizer.hpp"
#include "shortpkt/parallel.hpp"
#include "shortpkt/pgf.hpp"
#include "shortpkt/poly.hpp"
#include "shortpkt/rng.hpp"
#include "shortpkt/simulator.hpp"
