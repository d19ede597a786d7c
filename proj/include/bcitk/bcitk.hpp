#pragma once

// Everything public except the raw kernels.

#include "bcitk/buffers.hpp"
#include "bcitk/data.hpp"
#include "bcitk/error.hpp"
#include "bcitk/features.hpp"
#include "bcitk/io.hpp"
#include "bcitk/ml.hpp"
#include "bcitk/online.hpp"
#include "bcitk/pipeline.hpp"
#include "bcitk/sigproc.hpp"
#include "bcitk/synthetic.hpp"
#include "bcitk/viz.hpp"
