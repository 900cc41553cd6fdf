#pragma once

#include "objnav/core.hpp"
#include "objnav/enhance/strategies.hpp"
#include "objnav/eval/batch.hpp"
#include "objnav/eval/bootstrap.hpp"
#include "objnav/eval/metrics.hpp"
#include "objnav/eval/runner.hpp"
#include "objnav/eval/session.hpp"
#include "objnav/perception/augment.hpp"
#include "objnav/perception/compress.hpp"
#include "objnav/perception/detector.hpp"
#include "objnav/perception/frontier.hpp"
#include "objnav/perception/semantic_map.hpp"
#include "objnav/policy/goal.hpp"
#include "objnav/policy/planner.hpp"
#include "objnav/policy/reward.hpp"
#include "objnav/world/episode.hpp"
#include "objnav/world/generator.hpp"
#include "objnav/world/geodesic.hpp"
#include "objnav/world/kinematics.hpp"
#include "objnav/world/scene.hpp"
#include "objnav/world/scene_io.hpp"
#include "objnav/world/sensor.hpp"
