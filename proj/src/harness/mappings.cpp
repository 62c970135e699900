#include "ipsme/harness/mappings.hpp"

#include "ipsme/error.hpp"

namespace ipsme::harness {

const std::vector<std::pair<std::string, std::string>> &item_table() {
    static const std::vector<std::pair<std::string, std::string>> table{
        {"shotgun", "bow"},
        {"chaingun", "crossbow"},
        {"plasma_gun", "trident"},
        {"bfg9000", "tnt"},
        {"medkit", "golden_apple"},
        {"armor", "iron_chestplate"},
        {"blue_keycard", "tripwire_hook"},
        {"soulsphere", "totem_of_undying"},
        {"berserk", "potion_of_strength"},
        {"chainsaw", "iron_axe"},
    };
    return table;
}

bool is_known_mapping(std::string_view name) noexcept {
    return name == "retag" || name == "inventory";
}

Mapping make_mapping(std::string_view name, const std::string &from_tag, const std::string &to_tag) {
    if (name == "retag") {
        return [n = from_tag.size(), to_tag](ByteView in) {
            Bytes out = to_bytes(to_tag);
            out.insert(out.end(), in.begin() + static_cast<std::ptrdiff_t>(std::min(n, in.size())), in.end());
            return out;
        };
    }
    if (name == "inventory") {
        return [n = from_tag.size(), to_tag](ByteView in) {
            std::string rest = ipsme::to_string(in.subspan(std::min(n, in.size())));
            std::string item = rest.starts_with('|') ? rest.substr(1) : rest;
            for (const auto &[a, b] : item_table()) {
                if (a == item) {
                    item = b;
                    break;
                }
            }
            return to_bytes(to_tag + "|" + item);
        };
    }
    throw Error(ErrorCode::ConfigError, "unknown mapping '" + std::string(name) + "'");
}

}  // namespace ipsme::harness
