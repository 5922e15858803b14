#pragma once

#include "kneadlab/config.hpp"
#include "kneadlab/error.hpp"
#include "kneadlab/gaps.hpp"
#include "kneadlab/map.hpp"
#include "kneadlab/measure.hpp"
#include "kneadlab/nest.hpp"
#include "kneadlab/numeric.hpp"
#include "kneadlab/orbits.hpp"
#include "kneadlab/renormalization.hpp"
#include "kneadlab/report.hpp"
#include "kneadlab/symbolic.hpp"
#include "kneadlab/symbols.hpp"
#include "kneadlab/typical.hpp"
#include "kneadlab/verify.hpp"
