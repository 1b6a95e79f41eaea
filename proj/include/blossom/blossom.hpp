// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "blossom/annotation_io.hpp"
#include "blossom/clustering.hpp"
#include "blossom/error.hpp"
#include "blossom/evaluation.hpp"
#include "blossom/format.hpp"
#include "blossom/geometry.hpp"
#include "blossom/pipeline.hpp"
#include "blossom/render.hpp"
#include "blossom/synth.hpp"
