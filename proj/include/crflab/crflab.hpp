#pragma once

#include "crflab/checks.hpp"
#include "crflab/common.hpp"
#include "crflab/flow.hpp"
#include "crflab/geometry.hpp"
#include "crflab/hexlab.hpp"
#include "crflab/layout.hpp"
#include "crflab/ode.hpp"
#include "crflab/parallel.hpp"
#include "crflab/report.hpp"
#include "crflab/triangulation.hpp"
#include "crflab/vel.hpp"
#include "crflab/vel_oracle.hpp"
