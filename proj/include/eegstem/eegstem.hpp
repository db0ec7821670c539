#pragma once

#include "eegstem/types.hpp"
#include "eegstem/util.hpp"
#include "eegstem/ingest.hpp"
#include "eegstem/spectral.hpp"
#include "eegstem/dataset.hpp"
#include "eegstem/tree.hpp"
#include "eegstem/ensemble.hpp"
#include "eegstem/metrics.hpp"
#include "eegstem/experiment.hpp"
#include "eegstem/synth.hpp"
#include "eegstem/pipeline.hpp"
