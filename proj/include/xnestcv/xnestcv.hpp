#ifndef XNESTCV_XNESTCV_HPP
#define XNESTCV_XNESTCV_HPP

#include "xnestcv/cv_estimators.hpp"
#include "xnestcv/dataset.hpp"
#include "xnestcv/errors.hpp"
#include "xnestcv/hypothesis_tests.hpp"
#include "xnestcv/io.hpp"
#include "xnestcv/linalg.hpp"
#include "xnestcv/nested_cv.hpp"
#include "xnestcv/partitions.hpp"
#include "xnestcv/simulation.hpp"
#include "xnestcv/threading.hpp"

#endif  // XNESTCV_XNESTCV_HPP
