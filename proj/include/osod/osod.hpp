#pragma once

// Umbrella header: the full uncertainty-aware open-set detection toolkit.

#include "osod/assignment.hpp"
#include "osod/coco_classes.hpp"
#include "osod/common.hpp"
#include "osod/data.hpp"
#include "osod/formats.hpp"
#include "osod/geometry.hpp"
#include "osod/io.hpp"
#include "osod/losses.hpp"
#include "osod/metrics.hpp"
#include "osod/parallel.hpp"
#include "osod/postprocess.hpp"
#include "osod/report.hpp"
#include "osod/split.hpp"
#include "osod/taxonomy.hpp"
