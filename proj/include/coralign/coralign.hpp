#pragma once

#include "coralign/coral.hpp"
#include "coralign/dataset.hpp"
#include "coralign/error.hpp"
#include "coralign/feature_selection.hpp"
#include "coralign/linalg.hpp"
#include "coralign/logistic_regression.hpp"
#include "coralign/matrix.hpp"
#include "coralign/metrics.hpp"
#include "coralign/pca.hpp"
#include "coralign/pipeline.hpp"
#include "coralign/power_transform.hpp"
#include "coralign/rng.hpp"
#include "coralign/serialize.hpp"
#include "coralign/stats.hpp"
