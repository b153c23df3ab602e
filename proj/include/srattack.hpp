#pragma once

// Umbrella header.

#include "srattack/attack.hpp"
#include "srattack/csv.hpp"
#include "srattack/detection_eval.hpp"
#include "srattack/error.hpp"
#include "srattack/image.hpp"
#include "srattack/image_io.hpp"
#include "srattack/manifest.hpp"
#include "srattack/metrics.hpp"
#include "srattack/parallel.hpp"
#include "srattack/resample.hpp"
#include "srattack/run_manifest.hpp"
#include "srattack/similarity.hpp"
#include "srattack/sr_engine.hpp"
#include "srattack/sr_model.hpp"
#include "srattack/srw_format.hpp"
