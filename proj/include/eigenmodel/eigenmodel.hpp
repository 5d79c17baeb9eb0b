#pragma once

// Everything: data, model, inference, summaries and metrics.
#include "eigenmodel/cavi.hpp"
#include "eigenmodel/errors.hpp"
#include "eigenmodel/eval.hpp"
#include "eigenmodel/gssm.hpp"
#include "eigenmodel/logistic_init.hpp"
#include "eigenmodel/model.hpp"
#include "eigenmodel/network.hpp"
#include "eigenmodel/polya_gamma.hpp"
#include "eigenmodel/posterior.hpp"
#include "eigenmodel/postprocess.hpp"
#include "eigenmodel/random.hpp"
#include "eigenmodel/tables.hpp"
