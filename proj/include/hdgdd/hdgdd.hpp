#pragma once

#include "hdgdd/dd_problem.hpp"
#include "hdgdd/experiments.hpp"
#include "hdgdd/hdg_local.hpp"
#include "hdgdd/mesh.hpp"
#include "hdgdd/monolithic.hpp"
#include "hdgdd/problem.hpp"
#include "hdgdd/quadrature.hpp"
#include "hdgdd/schwarz_nn.hpp"
#include "hdgdd/schwarz_tf.hpp"
#include "hdgdd/subdomain_solver.hpp"
#include "hdgdd/svg_plot.hpp"
