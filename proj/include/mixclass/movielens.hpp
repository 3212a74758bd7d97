#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace mixclass {

// Canonical genre order: the 20 MovieLens genre strings sorted
// lexicographically.
extern const std::array<std::string, 20> kGenres;
int genre_index(const std::string& name);  // -1 for unknown genres

struct MovieInfo {
  int movie_id = 0;
  std::vector<int> genres;  // canonical indices, ascending
};

// Genre preferences for a chosen user pair plus their per-movie like bits.
struct PreferenceInstance {
  int user1 = 0;
  int user2 = 0;
  std::vector<MovieInfo> common_movies;  // rated by both, post filtering
  std::vector<int> likes1;               // like bit per common movie (0/1)
  std::vector<int> likes2;
  std::vector<int> pref1;  // 20 planted genre-preference bits (half rule)
  std::vector<int> pref2;
};

// Ratings CSV `userId,movieId,rating,timestamp` and movies CSV
// `movieId,title,genres` (pipe-separated genres), both with a header row.
// Filters movies to mean rating in [2.5, 3.5], keeps movies the pair rated in
// common, and derives genre preferences: a movie is liked at rating >= 3, a
// genre is liked when at least half of the user's rated movies in it are
// liked (no rated movies in a genre -> disliked). Throws ConfigError on
// malformed rows (with line numbers) or when the pair has fewer than
// `min_common` common movies.
PreferenceInstance ingest_movielens(const std::string& ratings_path,
                                    const std::string& movies_path, int user1, int user2,
                                    int min_common = 500);

struct MovielensMetrics {
  double accuracy1 = 0, precision1 = 0, recall1 = 0;
  double accuracy2 = 0, precision2 = 0, recall2 = 0;
};

// One seeded run: m1 movies drive the liked-by-none/one/both genre partition,
// m2 movies align the liked-by-exactly-one genres, the rest validate. The
// output permutation is resolved toward the higher mean validation accuracy.
MovielensMetrics movielens_trial(const PreferenceInstance& pref, int m1, int m2,
                                 std::uint64_t seed, std::vector<int>* recovered1 = nullptr,
                                 std::vector<int>* recovered2 = nullptr);

MovielensMetrics movielens_experiment(const PreferenceInstance& pref, int m1, int m2,
                                      const std::vector<std::uint64_t>& seeds);

}  // namespace mixclass
