#pragma once

#include "colddiff/core/binary.hpp"
#include "colddiff/core/errors.hpp"
#include "colddiff/core/image.hpp"
#include "colddiff/core/log.hpp"
#include "colddiff/core/parallel.hpp"
#include "colddiff/core/rng.hpp"
#include "colddiff/data/augment.hpp"
#include "colddiff/data/cifar.hpp"
#include "colddiff/data/config.hpp"
#include "colddiff/data/dataset.hpp"
#include "colddiff/data/image_io.hpp"
#include "colddiff/data/mnist.hpp"
#include "colddiff/data/sources.hpp"
#include "colddiff/data/synthetic.hpp"
#include "colddiff/degrade/blur.hpp"
#include "colddiff/degrade/convolution.hpp"
#include "colddiff/degrade/degradation.hpp"
#include "colddiff/degrade/desaturate.hpp"
#include "colddiff/degrade/downsample.hpp"
#include "colddiff/degrade/interp.hpp"
#include "colddiff/degrade/linear.hpp"
#include "colddiff/degrade/mask.hpp"
#include "colddiff/degrade/presets.hpp"
#include "colddiff/degrade/snow.hpp"
#include "colddiff/eval/frechet.hpp"
#include "colddiff/eval/metrics.hpp"
#include "colddiff/eval/report.hpp"
#include "colddiff/eval/stability.hpp"
#include "colddiff/generate/gmm.hpp"
#include "colddiff/generate/pipeline.hpp"
#include "colddiff/generate/prior.hpp"
#include "colddiff/generate/prior_io.hpp"
#include "colddiff/restore/checkpoint.hpp"
#include "colddiff/restore/conv_restorer.hpp"
#include "colddiff/restore/gradcheck.hpp"
#include "colddiff/restore/loss.hpp"
#include "colddiff/restore/neural.hpp"
#include "colddiff/restore/restorer.hpp"
#include "colddiff/restore/tensor.hpp"
#include "colddiff/restore/train.hpp"
#include "colddiff/sample/export.hpp"
#include "colddiff/sample/samplers.hpp"
#include "colddiff/sample/trajectory.hpp"
