#pragma once

#include "minr/activation.hpp"
#include "minr/checkpoint.hpp"
#include "minr/error.hpp"
#include "minr/image.hpp"
#include "minr/linear.hpp"
#include "minr/metrics.hpp"
#include "minr/model.hpp"
#include "minr/parallel.hpp"
#include "minr/random.hpp"
#include "minr/report.hpp"
#include "minr/tensor.hpp"
#include "minr/trainer.hpp"
