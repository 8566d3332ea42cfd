#pragma once

#include <stdexcept>
#include <string>

namespace maskeval {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid box/polygon geometry (negative extents, bad dims).
class geometry_error : public error {
public:
    using error::error;
};

// Malformed masks: RLE counts that do not cover the frame, dims mismatches,
// degenerate polygons, statistics of empty masks.
class mask_error : public error {
public:
    using error::error;
};

// Document-level failures; messages carry image id and record index.
class parse_error : public error {
public:
    using error::error;
};

// Evaluation misuse: mismatched params across match results, insufficient data.
class eval_error : public error {
public:
    using error::error;
};

class config_error : public error {
public:
    using error::error;
};

} // namespace maskeval
