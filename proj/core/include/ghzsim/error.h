// Copyright 2026 The ghzsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GHZSIM_ERROR_H
#define GHZSIM_ERROR_H

#include <stdexcept>
#include <string>

namespace ghzsim {

/// Invalid configuration or arguments supplied by the caller.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string &what) : std::invalid_argument(what) {
    }
};

/// A protocol could not complete (e.g. no coincidence peak found).
struct SimulationError : std::runtime_error {
    explicit SimulationError(const std::string &what) : std::runtime_error(what) {
    }
};

}  // namespace ghzsim

#endif
