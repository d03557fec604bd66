// Copyright 2026 The privexp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#ifndef PRIVEXP_PRIVEXP_HPP_
#define PRIVEXP_PRIVEXP_HPP_

#include "privexp/adversary.hpp"
#include "privexp/distortion.hpp"
#include "privexp/distributions.hpp"
#include "privexp/error.hpp"
#include "privexp/exponents.hpp"
#include "privexp/policies.hpp"
#include "privexp/serialization.hpp"
#include "privexp/smartmeter.hpp"

#endif  // PRIVEXP_PRIVEXP_HPP_
