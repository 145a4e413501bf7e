#pragma once

#include "tetlb/error.hpp"
#include "tetlb/geometry.hpp"
#include "tetlb/harness.hpp"
#include "tetlb/mesh.hpp"
#include "tetlb/mesh_io.hpp"
#include "tetlb/metrics.hpp"
#include "tetlb/parallel.hpp"
#include "tetlb/part1d.hpp"
#include "tetlb/partition.hpp"
#include "tetlb/remap.hpp"
#include "tetlb/rtree.hpp"
#include "tetlb/scan.hpp"
#include "tetlb/sfc.hpp"
