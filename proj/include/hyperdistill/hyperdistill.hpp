#pragma once

#include "hyperdistill/audit.hpp"
#include "hyperdistill/config.hpp"
#include "hyperdistill/linalg.hpp"
#include "hyperdistill/oracle.hpp"
#include "hyperdistill/protocol.hpp"
#include "hyperdistill/qnd.hpp"
#include "hyperdistill/random.hpp"
#include "hyperdistill/report.hpp"
#include "hyperdistill/states.hpp"
#include "hyperdistill/transcript.hpp"
