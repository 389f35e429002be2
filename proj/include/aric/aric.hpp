#pragma once

#include "aric/bitstream.hpp"
#include "aric/codebook.hpp"
#include "aric/codec.hpp"
#include "aric/common.hpp"
#include "aric/image.hpp"
#include "aric/kmeans.hpp"
#include "aric/metrics.hpp"
#include "aric/prob_model.hpp"
#include "aric/range_coder.hpp"
#include "aric/tokenizer.hpp"
