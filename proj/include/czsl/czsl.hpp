#pragma once

#include "czsl/core/matrix.hpp"
#include "czsl/core/random.hpp"
#include "czsl/data/dataset.hpp"
#include "czsl/data/synthetic.hpp"
#include "czsl/data/tasks.hpp"
#include "czsl/nn/adam.hpp"
#include "czsl/nn/checkpoint.hpp"
#include "czsl/nn/losses.hpp"
#include "czsl/nn/mlp.hpp"
#include "czsl/model/cvae.hpp"
#include "czsl/learner/config.hpp"
#include "czsl/learner/continual_learner.hpp"
#include "czsl/classifier/classifier.hpp"
#include "czsl/eval/metrics.hpp"
#include "czsl/harness/experiment.hpp"
