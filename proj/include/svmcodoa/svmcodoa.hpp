#pragma once

#include "svmcodoa/rng.hpp"
#include "svmcodoa/core.hpp"
#include "svmcodoa/codoa.hpp"
#include "svmcodoa/baselines/ga.hpp"
#include "svmcodoa/baselines/de.hpp"
#include "svmcodoa/baselines/csa.hpp"
#include "svmcodoa/baselines/pso.hpp"
#include "svmcodoa/optimizers.hpp"
#include "svmcodoa/kernel.hpp"
#include "svmcodoa/svm.hpp"
#include "svmcodoa/dataset.hpp"
#include "svmcodoa/objective.hpp"
#include "svmcodoa/model_io.hpp"
#include "svmcodoa/experiment.hpp"
