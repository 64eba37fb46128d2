#pragma once

#include <cmath>

// dB <-> linear conversions, kept in one place so no unit drift creeps in.
// Everything downstream of config parsing works in linear units (watts, Hz).

namespace mmshare {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

}  // namespace mmshare
