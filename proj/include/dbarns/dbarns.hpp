/// @file dbarns.hpp
/// @brief Umbrella header.
#pragma once

#include "dbarns/common.hpp"
#include "dbarns/multi_index.hpp"
#include "dbarns/spectral.hpp"
#include "dbarns/forms.hpp"
#include "dbarns/dolbeault.hpp"
#include "dbarns/field_norms.hpp"
#include "dbarns/initial.hpp"
#include "dbarns/dynamics.hpp"
#include "dbarns/norms.hpp"
#include "dbarns/reference.hpp"
#include "dbarns/io.hpp"
#include "dbarns/cli.hpp"
