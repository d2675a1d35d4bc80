// photonloom.hpp
// Umbrella header.

#pragma once

#include "photonloom/fock.hpp"
#include "photonloom/emission.hpp"
#include "photonloom/elements.hpp"
#include "photonloom/detection.hpp"
#include "photonloom/parallel.hpp"
#include "photonloom/protocols.hpp"
#include "photonloom/noise_mc.hpp"
#include "photonloom/oracle.hpp"
#include "photonloom/config.hpp"
#include "photonloom/report_io.hpp"
