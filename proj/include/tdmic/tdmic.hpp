#pragma once

#include "tdmic/dnf.hpp"
#include "tdmic/greedy.hpp"
#include "tdmic/io.hpp"
#include "tdmic/mic.hpp"
#include "tdmic/optimal.hpp"
#include "tdmic/sample.hpp"
#include "tdmic/tree.hpp"
#include "tdmic/verify.hpp"
