// Synthetic corpus with planted ground truth.
//
// Every context gets its own entities, so the entity stage alone isolates
// the gold for verbatim queries. Perturbed queries shuffle event wording,
// drop the explicit action, paraphrase the scene and swap type aliases.

#include <array>
#include <random>
#include <set>

#include "ees/evaluation.hpp"

namespace ees {

namespace {

constexpr std::array kGiven = {"Mara",  "Lin",   "Tomas", "Aiko",  "Ravi",  "Elena", "Jun",
                               "Nadia", "Owen",  "Sofia", "Kemal", "Ines",  "Yusuf", "Hana",
                               "Pavel", "Zara",  "Diego", "Mei",   "Arjun", "Lena"};
constexpr std::array kFamily = {"Quinn", "Zhao",   "Berg",  "Sato",  "Menon", "Petrova", "Wu",
                                "Haddad", "Price", "Rossi", "Aydin", "Costa", "Okafor",  "Kim",
                                "Novak", "Ali",    "Vega",  "Chen",  "Rao",   "Fischer"};
constexpr std::array kOrgWords = {"Harbor", "Northern", "Civic",  "Meridian", "Granite",
                                  "Lotus",  "Summit",   "Crescent", "Beacon", "Atlas"};
constexpr std::array kOrgKinds = {"Union", "Council", "Agency", "Institute", "Alliance", "Group"};
constexpr std::array kPlaces = {"Square", "Bridge", "Stadium", "Harbor", "Plaza", "Station"};
constexpr std::array kObjects = {"Banner", "Podium", "Flag", "Drone", "Truck", "Monument"};
constexpr std::array kDocs = {"Treaty", "Report", "Charter", "Memo", "Statement", "Petition"};

constexpr std::array kActions = {
    "speech",   "march",    "protest",    "signing",    "meeting",   "inspection",
    "parade",   "launch",   "interview",  "rally",      "ceremony",  "negotiation",
    "visit",    "summit",   "briefing",   "celebration", "announcement", "handshake",
    "vote",     "concert",  "exhibition", "drill",      "rescue",    "vigil"};

constexpr std::array kEventTails = {
    "near the east gate while reporters watch", "in front of a large crowd",
    "under heavy security",                     "before the evening broadcast",
    "beside the old clock tower",               "as flags wave overhead",
    "with officials standing nearby",           "during a light rain",
    "inside a crowded hall",                    "at the edge of the waterfront"};

constexpr std::array kWeather = {"sunny", "rainy", "foggy", "windy", "snowy", "cloudy"};
constexpr std::array kSettings = {"harbor district", "city square", "stadium field",
                                  "mountain village", "river bank", "conference hall"};
constexpr std::array kDetails = {"waving banners", "parked vehicles", "bright lanterns",
                                 "tall scaffolding", "rows of chairs", "market stalls"};
constexpr std::array kMoods = {"a tense atmosphere", "a festive mood", "a quiet calm",
                               "an excited crowd", "a solemn feeling", "a busy rhythm"};
constexpr std::array kCities = {"Jinan", "Lyon", "Osaka", "Porto", "Tbilisi", "Quito"};

// Scene paraphrases; each word maps to a near-synonym.
constexpr std::array<std::pair<const char*, const char*>, 14> kSynonyms = {{
    {"sunny", "bright"},     {"rainy", "wet"},         {"foggy", "misty"},
    {"windy", "blustery"},   {"snowy", "wintry"},      {"cloudy", "overcast"},
    {"harbor", "port"},      {"square", "plaza"},      {"field", "pitch"},
    {"village", "hamlet"},   {"bank", "shore"},        {"hall", "auditorium"},
    {"tense", "uneasy"},     {"festive", "cheerful"},
}};

struct TypeChoice {
  const char* primary;
  const char* alias;
};
constexpr std::array kTypes = {TypeChoice{"Person", "Character"},
                               TypeChoice{"Organization", "Company"},
                               TypeChoice{"Location", "Place"}, TypeChoice{"Object", "Item"},
                               TypeChoice{"Document", "File"}};

// mt19937_64 output is fixed by the standard; the std distributions are
// not, so draws reduce the raw output directly.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
  template <typename A>
  auto pick(const A& a) {
    return a[below(a.size())];
  }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 rng_;
};

std::string pad4(std::size_t i) {
  std::string s = std::to_string(i);
  return std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

std::string entity_name(Draw& d, std::size_t type_index) {
  switch (type_index) {
    case 0: return std::string(d.pick(kGiven)) + " " + d.pick(kFamily);
    case 1: return std::string(d.pick(kOrgWords)) + " " + d.pick(kOrgKinds);
    case 2: return std::string(d.pick(kOrgWords)) + " " + d.pick(kPlaces);
    case 3: return std::string(d.pick(kOrgWords)) + " " + d.pick(kObjects);
    default: return std::string(d.pick(kOrgWords)) + " " + d.pick(kDocs);
  }
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string join_words(const std::vector<std::string>& ws) {
  std::string out;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (i) out += ' ';
    out += ws[i];
  }
  return out;
}

std::string paraphrase(const std::string& s) {
  auto ws = words(s);
  for (auto& w : ws) {
    for (const auto& [from, to] : kSynonyms) {
      if (w == from) {
        w = to;
        break;
      }
    }
  }
  return join_words(ws);
}

}  // namespace

Fixture generate_fixture(std::size_t n_contexts, std::uint64_t seed) {
  if (n_contexts < 2) throw std::invalid_argument("fixture needs at least 2 contexts");
  Draw d(seed);
  Fixture fx;
  fx.action_lexicon.assign(kActions.begin(), kActions.end());

  std::set<std::string> used_names;
  std::vector<std::vector<std::size_t>> type_of(n_contexts);

  for (std::size_t c = 0; c < n_contexts; ++c) {
    EESRecord r;
    r.record_id = "rec-" + pad4(c);

    const std::size_t n_entities = 2 + d.below(3);
    for (std::size_t i = 0; i < n_entities; ++i) {
      const std::size_t t = d.below(kTypes.size());
      std::string name = entity_name(d, t);
      for (std::size_t k = 2; used_names.contains(name); ++k) {
        name = entity_name(d, t) + " " + std::to_string(k);
      }
      used_names.insert(name);
      r.entities.push_back({name, kTypes[t].primary});
      type_of[c].push_back(t);
    }

    const std::size_t n_events = 1 + d.below(3);
    std::vector<std::string> actions(kActions.begin(), kActions.end());
    d.shuffle(actions);
    for (std::size_t e = 0; e < n_events; ++e) {
      RecordEvent ev;
      const auto& first = r.entities[d.below(r.entities.size())].name;
      ev.entity_names.push_back(first);
      std::string subject = first;
      const auto& second = r.entities[d.below(r.entities.size())].name;
      if (second != first) {
        ev.entity_names.push_back(second);
        subject += " and " + second;
      }
      ev.action = actions[e];
      ev.description = subject + " take part in a " + actions[e] + " " + d.pick(kEventTails);
      r.events.push_back(std::move(ev));
    }

    r.scene.description = std::string("a ") + d.pick(kWeather) + " " + d.pick(kSettings) +
                          " with " + d.pick(kDetails) + " and " + d.pick(kMoods);
    r.scene.location = d.pick(kCities);
    r.scene.time = "2024-" + std::to_string(1 + d.below(12)) + "-" +
                   std::to_string(1 + d.below(28));
    r.context = RecordContext{"ctx-" + pad4(c),
                              "Background on the " + r.events.front().action + " involving " +
                                  r.entities.front().name + " in " + r.scene.location,
                              r.scene.time, r.scene.location};
    fx.corpus.push_back(std::move(r));
  }

  for (std::size_t c = 0; c < n_contexts; ++c) {
    const EESRecord& src = fx.corpus[c];
    LabeledQuery v;
    v.record = src;
    v.record.record_id = "q-v-" + pad4(c);
    v.record.context.reset();
    v.gold_context_id = src.context->context_id;
    fx.queries.push_back(std::move(v));
  }
  for (std::size_t c = 0; c < n_contexts; ++c) {
    const EESRecord& src = fx.corpus[c];
    LabeledQuery p;
    p.record = src;
    p.record.record_id = "q-p-" + pad4(c);
    p.record.context.reset();
    for (std::size_t i = 0; i < p.record.entities.size(); ++i) {
      if (d.below(2) == 1) p.record.entities[i].type = kTypes[type_of[c][i]].alias;
    }
    for (auto& ev : p.record.events) {
      auto ws = words(ev.description);
      d.shuffle(ws);
      ev.description = join_words(ws);
      ev.action.clear();
    }
    p.record.scene.description = paraphrase(p.record.scene.description);
    p.gold_context_id = src.context->context_id;
    fx.queries.push_back(std::move(p));
  }
  return fx;
}

}  // namespace ees
