#pragma once

#include "dualgeo/manifold.hpp"

namespace dualgeo::detail {

ManifoldModel build_model(std::string_view name, std::span<const double> params);
const std::vector<CatalogEntry>& catalog_entries();

}  // namespace dualgeo::detail
