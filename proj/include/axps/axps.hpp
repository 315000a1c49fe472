// Copyright 2026 The axps Authors
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


#pragma once

#include "axps/archive.hpp"
#include "axps/categories.hpp"
#include "axps/condition.hpp"
#include "axps/dataset.hpp"
#include "axps/differential.hpp"
#include "axps/error.hpp"
#include "axps/evaluate.hpp"
#include "axps/harness.hpp"
#include "axps/label_io.hpp"
#include "axps/label_map.hpp"
#include "axps/matching.hpp"
#include "axps/metrics.hpp"
#include "axps/oracle.hpp"
#include "axps/png.hpp"
#include "axps/report_io.hpp"
