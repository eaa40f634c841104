#pragma once

#include "oddforms/forms.hpp"

#include <initializer_list>
#include <string>
#include <vector>

namespace testutil {

inline oddforms::FormSystem sys_of(const std::string& text) {
    return oddforms::parse_system(text);
}

inline const oddforms::Form& only_form(const oddforms::FormSystem& s) {
    return *s.forms_in_order().front();
}

inline std::vector<oddforms::Int> ints(std::initializer_list<long long> vals) {
    return std::vector<oddforms::Int>(vals.begin(), vals.end());
}

inline std::string str(const oddforms::Form& f, const oddforms::FormSystem& sys) {
    return f.to_string(sys.names());
}

}  // namespace testutil
