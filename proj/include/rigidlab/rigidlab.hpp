#pragma once

#include "rigidlab/assembly.hpp"
#include "rigidlab/bricard.hpp"
#include "rigidlab/geometry.hpp"
#include "rigidlab/io.hpp"
#include "rigidlab/mechanism.hpp"
#include "rigidlab/rigidity.hpp"
#include "rigidlab/surface.hpp"
#include "rigidlab/verify.hpp"
