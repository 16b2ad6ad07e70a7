#pragma once

#define TPSALIGN_VERSION "0.1.0"

#include "tpsalign/binary_io.hpp"
#include "tpsalign/errors.hpp"
#include "tpsalign/feature_map.hpp"
#include "tpsalign/geometry.hpp"
#include "tpsalign/landmarks.hpp"
#include "tpsalign/losses.hpp"
#include "tpsalign/parallel.hpp"
#include "tpsalign/pipeline.hpp"
#include "tpsalign/sampler.hpp"
#include "tpsalign/tps.hpp"
#include "tpsalign/warp_field.hpp"
