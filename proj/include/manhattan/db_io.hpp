#pragma once

#include <string>

#include "manhattan/orbits.hpp"

namespace manhattan {

// JSON-lines database format, format_version 1: a header record followed by
// one record per orbit (and per excluded marking). Complex numbers are
// [re, im] pairs; reals are written with 17 significant digits so reloading
// reproduces every double bit-for-bit.
void save_database(const OrbitDatabase& db, const std::string& path);

OrbitDatabase load_database(const std::string& path);

// %.17g with C-locale semantics; also used by the CSV writers
std::string format_real(double x);

}  // namespace manhattan
