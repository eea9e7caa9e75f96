#pragma once

#include "mvsteg/calibration.hpp"
#include "mvsteg/codec.hpp"
#include "mvsteg/error.hpp"
#include "mvsteg/evaluation.hpp"
#include "mvsteg/experiment.hpp"
#include "mvsteg/features.hpp"
#include "mvsteg/motion_search.hpp"
#include "mvsteg/motion_vector.hpp"
#include "mvsteg/parallel.hpp"
#include "mvsteg/random.hpp"
#include "mvsteg/stego.hpp"
#include "mvsteg/stream.hpp"
#include "mvsteg/svm.hpp"
#include "mvsteg/transform.hpp"
#include "mvsteg/yuv_io.hpp"
