#pragma once

#include "realtree/decoder.hpp"
#include "realtree/document.hpp"
#include "realtree/encoder.hpp"
#include "realtree/error.hpp"
#include "realtree/linalg.hpp"
#include "realtree/path.hpp"
#include "realtree/random.hpp"
#include "realtree/tree.hpp"
#include "realtree/selftest.hpp"
