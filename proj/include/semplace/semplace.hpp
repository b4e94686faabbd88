#pragma once

#include "semplace/annotate.hpp"
#include "semplace/classify.hpp"
#include "semplace/cluster.hpp"
#include "semplace/density.hpp"
#include "semplace/errors.hpp"
#include "semplace/eval.hpp"
#include "semplace/geo.hpp"
#include "semplace/ingest.hpp"
#include "semplace/labels.hpp"
#include "semplace/methods.hpp"
