// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include "pdmpaxon/kinetics.hpp"

namespace pdmpaxon {

// Plain-text scheme definition, '#' starts a comment:
//
//   [scheme]
//   id = na8
//   [states]
//   # name  class  conductance  reversal
//   m0h0    0      0            0
//   m3h1    1      120          115
//   [rates]
//   # from  to    rate
//   m0h0    m1h0  3*a_m
//
// Rates are a_m, b_m, a_h, b_h with an optional "k*" multiplier, or a positive
// constant. Pairs not listed are structurally zero.

KineticScheme parse_scheme_text(std::string_view text, const std::string& fallback_id = "custom");
KineticScheme read_scheme_file(const std::string& path);
std::string format_scheme_text(const KineticScheme& scheme);

}  // namespace pdmpaxon
