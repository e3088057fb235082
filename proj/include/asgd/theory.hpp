#pragma once

// Verification lab; needs Eigen.
#include "asgd/theory/checks.hpp"
#include "asgd/theory/dense_sgd.hpp"
#include "asgd/theory/experiments.hpp"
#include "asgd/theory/linalg.hpp"
#include "asgd/theory/linear_sa.hpp"
#include "asgd/theory/suite.hpp"
#include "asgd/theory/synthetic.hpp"
#include "asgd/theory/xbar.hpp"
