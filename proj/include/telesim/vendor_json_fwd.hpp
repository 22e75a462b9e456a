#pragma once

// nlohmann/json is header-only; headers that only name the type in
// signatures pull the full header here once.
#include "json.hpp"
