#pragma once

#include "medgnn/activations.hpp"
#include "medgnn/adam.hpp"
#include "medgnn/common.hpp"
#include "medgnn/config.hpp"
#include "medgnn/dataset.hpp"
#include "medgnn/diffusion.hpp"
#include "medgnn/experiment.hpp"
#include "medgnn/filter.hpp"
#include "medgnn/graph.hpp"
#include "medgnn/matrix.hpp"
#include "medgnn/model.hpp"
#include "medgnn/neighborhood.hpp"
#include "medgnn/readout.hpp"
#include "medgnn/signal.hpp"
#include "medgnn/spectral.hpp"
#include "medgnn/train.hpp"
#include "medgnn/wan.hpp"
