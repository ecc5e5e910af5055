#include <stdio.h>
#include <string.h>
#include "algseries.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "failed: %s (line %d)\n", #cond, __LINE__); return 1; } } while (0)

int main(void) {
    AlgSystem *s = NULL;
    CHECK(alg_system_parse("vars: y\nindets: x\ny = x + 2*x*y + x*y^2\n", &s) == ALG_OK);
    uint32_t v[1] = {10};
    uint64_t r = 0;
    CHECK(alg_coeff(s, v, 1, 10007, ALG_KLEENE, &r) == ALG_OK);
    CHECK(r == 6789);
    bool finite = true;
    int64_t degree = 0;
    CHECK(alg_fin(s, 2, ALG_HENSEL, &finite, &degree) == ALG_OK);
    CHECK(!finite && degree == -1);
    CHECK(alg_coeff(s, v, 1, 1, ALG_HENSEL, &r) == ALG_BAD_MODULUS);
    CHECK(strstr(alg_last_error_message(), "modulus") != NULL);
    alg_system_free(s);

    AlgGrammar *g = NULL;
    CHECK(alg_grammar_parse("terminals: a b\nnonterminals: S\nS -> a b | a b S | a S b | a S b S\n", &g) == ALG_OK);
    char *count = NULL;
    CHECK(alg_count_derivations(g, "S", "aabbab", &count) == ALG_OK);
    CHECK(strcmp(count, "1") == 0);
    alg_string_free(count);
    alg_grammar_free(g);

    CHECK(alg_system_parse("vars: y\nindets: x\ny = 1 + y\n", &s) == ALG_OK);
    bool proper = true;
    CHECK(alg_system_is_proper(s, &proper) == ALG_OK && !proper);
    CHECK(alg_coeff(s, v, 1, 10007, ALG_HENSEL, &r) == ALG_NOT_PROPER);
    alg_system_free(s);
    CHECK(alg_system_parse("vars: y\ny = = 1\n", &s) == ALG_PARSE_ERROR);
    printf("ok\n");
    return 0;
}
