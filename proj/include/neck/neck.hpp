#pragma once

#include "neck/ir.hpp"
#include "neck/parser.hpp"
#include "neck/graph.hpp"
#include "neck/block_graph.hpp"
#include "neck/icfg.hpp"
#include "neck/taint.hpp"
#include "neck/boundary.hpp"
#include "neck/oracle.hpp"
#include "neck/report.hpp"
