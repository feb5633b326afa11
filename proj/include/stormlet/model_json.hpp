#pragma once

#include <string>

#include "stormlet/model.hpp"

namespace stormlet {

/// %.*g formatting; the model format uses 17 significant digits so that
/// doubles round-trip exactly.
std::string formatDouble(double value, int significantDigits = 17);

/// Serializes a model to the JSON interchange format.
std::string writeModelJson(ExplicitModel const& model);

/// Parses a model from the JSON interchange format and validates it.
/// Throws ParseError naming the offending path on schema or invariant
/// violations.
ExplicitModel readModelJson(std::string const& text);

ExplicitModel readModelFile(std::string const& path);
void writeModelFile(ExplicitModel const& model, std::string const& path);

std::string writeSchedulerJson(Scheduler const& scheduler);
Scheduler readSchedulerJson(std::string const& text);
Scheduler readSchedulerFile(std::string const& path);
void writeSchedulerFile(Scheduler const& scheduler, std::string const& path);

std::string writeValuesJson(std::vector<double> const& values);
std::vector<double> readValuesJson(std::string const& text);

std::string readTextFile(std::string const& path);
void writeTextFile(std::string const& path, std::string const& content);

} // namespace stormlet
