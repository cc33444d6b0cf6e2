#pragma once

#include "arcs/bdmetrics.hpp"
#include "arcs/error.hpp"
#include "arcs/ladder.hpp"
#include "arcs/measurements.hpp"
#include "arcs/objective.hpp"
#include "arcs/pchip.hpp"
#include "arcs/pipeline.hpp"
#include "arcs/report.hpp"
#include "arcs/synth.hpp"
