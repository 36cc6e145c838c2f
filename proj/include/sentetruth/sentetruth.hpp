#pragma once

#include "sentetruth/adversary.hpp"
#include "sentetruth/aggregation.hpp"
#include "sentetruth/bench.hpp"
#include "sentetruth/dataset.hpp"
#include "sentetruth/embedding.hpp"
#include "sentetruth/epoch_series.hpp"
#include "sentetruth/error.hpp"
#include "sentetruth/oraclesim.hpp"
#include "sentetruth/relatedness.hpp"
#include "sentetruth/sha256.hpp"
#include "sentetruth/text.hpp"
#include "sentetruth/synthetic.hpp"
