// Copyright (c) 2026 The usrep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Umbrella header.

#include "usrep/config.hpp"
#include "usrep/datasetgen.hpp"
#include "usrep/error.hpp"
#include "usrep/lexicon.hpp"
#include "usrep/metrics/bleu.hpp"
#include "usrep/metrics/cider.hpp"
#include "usrep/metrics/embedding.hpp"
#include "usrep/metrics/evaluate.hpp"
#include "usrep/metrics/mkf1.hpp"
#include "usrep/metrics/rouge.hpp"
#include "usrep/metrics/tokenize.hpp"
#include "usrep/report.hpp"
#include "usrep/segmenter.hpp"
#include "usrep/text.hpp"
