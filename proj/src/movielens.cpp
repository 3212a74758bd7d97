#include "mixclass/movielens.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mixclass/errors.hpp"
#include "mixclass/oracle.hpp"
#include "mixclass/rng.hpp"

namespace mixclass {

// Lexicographic order of the 20 MovieLens genre strings.
const std::array<std::string, 20> kGenres = {
    "(no genres listed)", "Action",   "Adventure", "Animation", "Children",
    "Comedy",             "Crime",    "Documentary", "Drama",   "Fantasy",
    "Film-Noir",          "Horror",   "IMAX",      "Musical",   "Mystery",
    "Romance",            "Sci-Fi",   "Thriller",  "War",       "Western"};

int genre_index(const std::string& name) {
  for (std::size_t i = 0; i < kGenres.size(); ++i)
    if (kGenres[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

// Splits one CSV line honoring double-quoted fields (titles contain commas).
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

struct RatingRow {
  int user;
  int movie;
  double rating;
};

}  // namespace

PreferenceInstance ingest_movielens(const std::string& ratings_path,
                                    const std::string& movies_path, int user1, int user2,
                                    int min_common) {
  std::ifstream movies_in(movies_path);
  if (!movies_in) throw ConfigError("cannot open movies file: " + movies_path);
  std::map<int, std::vector<int>> movie_genres;
  std::string line;
  int line_no = 0;
  while (std::getline(movies_in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;  // header
    auto fields = split_csv(line);
    if (fields.size() < 3)
      throw ConfigError(movies_path + " line " + std::to_string(line_no) + ": expected 3 fields");
    int id;
    try {
      id = std::stoi(fields[0]);
    } catch (...) {
      throw ConfigError(movies_path + " line " + std::to_string(line_no) + ": bad movieId");
    }
    std::vector<int> genres;
    std::stringstream gs(fields.back());
    std::string tok;
    while (std::getline(gs, tok, '|')) {
      int g = genre_index(tok);
      if (g >= 0) genres.push_back(g);
    }
    std::sort(genres.begin(), genres.end());
    genres.erase(std::unique(genres.begin(), genres.end()), genres.end());
    movie_genres[id] = std::move(genres);
  }

  std::ifstream ratings_in(ratings_path);
  if (!ratings_in) throw ConfigError("cannot open ratings file: " + ratings_path);
  std::vector<RatingRow> rows;
  std::map<int, std::pair<double, int>> movie_avg;  // sum, count
  line_no = 0;
  while (std::getline(ratings_in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() < 3)
      throw ConfigError(ratings_path + " line " + std::to_string(line_no) + ": expected 4 fields");
    RatingRow r{};
    try {
      r.user = std::stoi(fields[0]);
      r.movie = std::stoi(fields[1]);
      r.rating = std::stod(fields[2]);
    } catch (...) {
      throw ConfigError(ratings_path + " line " + std::to_string(line_no) + ": bad row");
    }
    auto& [sum, cnt] = movie_avg[r.movie];
    sum += r.rating;
    ++cnt;
    rows.push_back(r);
  }

  // Keep movies with mean rating in [2.5, 3.5].
  auto kept = [&](int movie) {
    auto it = movie_avg.find(movie);
    if (it == movie_avg.end() || it->second.second == 0) return false;
    double mean = it->second.first / it->second.second;
    return mean >= 2.5 && mean <= 3.5 && movie_genres.count(movie) > 0;
  };

  std::map<int, double> r1, r2;  // movie -> rating, per user
  for (const auto& r : rows) {
    if (!kept(r.movie)) continue;
    if (r.user == user1) r1[r.movie] = r.rating;
    if (r.user == user2) r2[r.movie] = r.rating;
  }

  PreferenceInstance pref;
  pref.user1 = user1;
  pref.user2 = user2;
  for (const auto& [movie, rating] : r1) {
    auto it = r2.find(movie);
    if (it == r2.end()) continue;
    MovieInfo info;
    info.movie_id = movie;
    info.genres = movie_genres.at(movie);
    pref.common_movies.push_back(std::move(info));
    pref.likes1.push_back(rating >= 3.0 ? 1 : 0);
    pref.likes2.push_back(it->second >= 3.0 ? 1 : 0);
  }
  if (static_cast<int>(pref.common_movies.size()) < min_common)
    throw ConfigError("user pair has only " + std::to_string(pref.common_movies.size()) +
                      " common movies, need " + std::to_string(min_common));

  // Half rule over the user's rated common movies; no evidence means dislike.
  auto derive_pref = [&](const std::vector<int>& likes) {
    std::vector<int> out(kGenres.size(), 0);
    for (std::size_t g = 0; g < kGenres.size(); ++g) {
      int rated = 0, liked = 0;
      for (std::size_t q = 0; q < pref.common_movies.size(); ++q) {
        if (!std::binary_search(pref.common_movies[q].genres.begin(),
                                pref.common_movies[q].genres.end(), static_cast<int>(g)))
          continue;
        ++rated;
        liked += likes[q];
      }
      out[g] = (rated > 0 && 2 * liked >= rated) ? 1 : 0;
    }
    return out;
  };
  pref.pref1 = derive_pref(pref.likes1);
  pref.pref2 = derive_pref(pref.likes2);
  return pref;
}

namespace {

// Predict like when at least half of the movie's genres are preferred.
int predict_like(const std::vector<int>& prefs, const std::vector<int>& genres) {
  if (genres.empty()) return 0;
  int liked = 0;
  for (int g : genres) liked += prefs[g];
  return 2 * liked >= static_cast<int>(genres.size()) ? 1 : 0;
}

struct UserScore {
  double accuracy = 0, precision = 0, recall = 0;
};

UserScore score_user(const PreferenceInstance& pref, const std::vector<int>& recovered,
                     const std::vector<int>& likes, const std::vector<int>& test_movies) {
  int correct = 0, tp = 0, fp = 0, fn = 0;
  for (int q : test_movies) {
    int predicted = predict_like(recovered, pref.common_movies[q].genres);
    int actual = likes[q];
    if (predicted == actual) ++correct;
    if (predicted == 1 && actual == 1) ++tp;
    if (predicted == 1 && actual == 0) ++fp;
    if (predicted == 0 && actual == 1) ++fn;
  }
  UserScore s;
  int total = static_cast<int>(test_movies.size());
  s.accuracy = total > 0 ? static_cast<double>(correct) / total : 0.0;
  s.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  s.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  return s;
}

}  // namespace

MovielensMetrics movielens_trial(const PreferenceInstance& pref, int m1, int m2,
                                 std::uint64_t seed, std::vector<int>* recovered1,
                                 std::vector<int>* recovered2) {
  const int total = static_cast<int>(pref.common_movies.size());
  if (m1 + m2 > total) throw ConfigError("movielens_trial: m1 + m2 exceeds common movie count");
  const int n_genres = static_cast<int>(kGenres.size());

  Rng rng(derive_seed(seed, 0x6d6c3031ULL));
  std::vector<int> order = rng.sample_without_replacement(total, total);

  std::vector<int> stage1(order.begin(), order.begin() + m1);
  std::vector<int> stage2(order.begin() + m1, order.begin() + m1 + m2);
  std::vector<int> test(order.begin() + m1 + m2, order.end());
  std::sort(test.begin(), test.end());
  if (test.empty()) throw ConfigError("movielens_trial: no validation movies left");

  // Crowd oracle: a uniformly random user of the pair answers with their like
  // bit. Batched queries estimate how many of the two like each movie.
  int batch = default_batchsize(2, 0.002, static_cast<std::uint64_t>(std::max(1, m1 + m2)));
  auto liker_count = [&](int q) {
    int positives = 0;
    for (int i = 0; i < batch; ++i) {
      bool first = rng.next_u64() & 1ULL;
      positives += first ? pref.likes1[q] : pref.likes2[q];
    }
    double est = 2.0 * positives / batch;
    return std::clamp(static_cast<int>(std::lround(est)), 0, 2);
  };

  // Stage 1: per-genre liker counts via the half-overlap threshold, exactly
  // the |S(i)| computation with movies as battery rows.
  std::vector<int> s_size(n_genres, 0);
  std::map<int, int> known_counts;  // movie -> estimated liker count
  {
    for (int q : stage1) known_counts[q] = liker_count(q);
    for (int g = 0; g < n_genres; ++g) {
      int d = 0;
      std::vector<int> at_least(3, 0);
      for (int q : stage1) {
        const auto& genres = pref.common_movies[q].genres;
        if (!std::binary_search(genres.begin(), genres.end(), g)) continue;
        ++d;
        for (int h = 0; h <= known_counts[q]; ++h) ++at_least[h];
      }
      if (d == 0) continue;
      for (int h = 2; h >= 1; --h)
        if (2 * at_least[h] >= d) {
          s_size[g] = h;
          break;
        }
    }
  }

  // Stage 2: align the liked-by-exactly-one genres against the pivot genre by
  // reading liker counts of movies isolating each pair, the union-size step.
  std::vector<int> ones;
  for (int g = 0; g < n_genres; ++g)
    if (s_size[g] == 1) ones.push_back(g);
  std::vector<int> groupA, groupB;  // A owns the pivot
  if (!ones.empty()) {
    int g0 = ones.front();
    groupA.push_back(g0);
    std::vector<char> liked_somewhere(n_genres, 0);
    for (int g = 0; g < n_genres; ++g) liked_somewhere[g] = s_size[g] > 0;
    auto count_of = [&](int q) {
      auto it = known_counts.find(q);
      if (it == known_counts.end()) it = known_counts.insert({q, liker_count(q)}).first;
      return it->second;
    };
    // Candidate movies for a pair, preferring the alignment sample; stage-1
    // movies already have counts and serve as a free fallback.
    auto candidates_for = [&](int g0_, int g, bool clean_only,
                              const std::vector<int>& source) {
      std::vector<int> out;
      for (int q : source) {
        const auto& genres = pref.common_movies[q].genres;
        if (!std::binary_search(genres.begin(), genres.end(), g0_) ||
            !std::binary_search(genres.begin(), genres.end(), g))
          continue;
        bool clean = true;
        for (int other : genres)
          if (other != g0_ && other != g && liked_somewhere[other]) clean = false;
        if (clean || !clean_only) out.push_back(q);
      }
      return out;
    };
    for (std::size_t gi = 1; gi < ones.size(); ++gi) {
      int g = ones[gi];
      std::vector<int> pool = candidates_for(g0, g, true, stage2);
      if (pool.empty()) pool = candidates_for(g0, g, true, stage1);
      if (pool.empty()) pool = candidates_for(g0, g, false, stage2);
      if (pool.empty()) pool = candidates_for(g0, g, false, stage1);
      int union_count = 2;  // no evidence: assume distinct users
      if (!pool.empty()) {
        union_count = 1;
        for (int q : pool) union_count = std::max(union_count, count_of(q));
      }
      (union_count == 1 ? groupA : groupB).push_back(g);
    }
  }

  std::vector<int> s1(n_genres, 0), s2(n_genres, 0);
  for (int g = 0; g < n_genres; ++g)
    if (s_size[g] == 2) s1[g] = s2[g] = 1;
  for (int g : groupA) s1[g] = 1;
  for (int g : groupB) s2[g] = 1;

  // Resolve the output permutation toward higher mean validation accuracy.
  UserScore a1 = score_user(pref, s1, pref.likes1, test);
  UserScore a2 = score_user(pref, s2, pref.likes2, test);
  UserScore b1 = score_user(pref, s2, pref.likes1, test);
  UserScore b2 = score_user(pref, s1, pref.likes2, test);
  bool keep = a1.accuracy + a2.accuracy >= b1.accuracy + b2.accuracy;

  MovielensMetrics m;
  const UserScore& u1 = keep ? a1 : b1;
  const UserScore& u2 = keep ? a2 : b2;
  m.accuracy1 = u1.accuracy;
  m.precision1 = u1.precision;
  m.recall1 = u1.recall;
  m.accuracy2 = u2.accuracy;
  m.precision2 = u2.precision;
  m.recall2 = u2.recall;
  if (recovered1) *recovered1 = keep ? s1 : s2;
  if (recovered2) *recovered2 = keep ? s2 : s1;
  return m;
}

MovielensMetrics movielens_experiment(const PreferenceInstance& pref, int m1, int m2,
                                      const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ConfigError("movielens_experiment: no seeds");
  MovielensMetrics mean;
  for (std::uint64_t seed : seeds) {
    MovielensMetrics m = movielens_trial(pref, m1, m2, seed);
    mean.accuracy1 += m.accuracy1;
    mean.precision1 += m.precision1;
    mean.recall1 += m.recall1;
    mean.accuracy2 += m.accuracy2;
    mean.precision2 += m.precision2;
    mean.recall2 += m.recall2;
  }
  double c = static_cast<double>(seeds.size());
  mean.accuracy1 /= c;
  mean.precision1 /= c;
  mean.recall1 /= c;
  mean.accuracy2 /= c;
  mean.precision2 /= c;
  mean.recall2 /= c;
  return mean;
}

}  // namespace mixclass
