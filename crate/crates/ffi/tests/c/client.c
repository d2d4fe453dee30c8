#include <stdio.h>
#include <string.h>

#include "fksmap.h"

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(void) {
    uint64_t keys[] = {3, 1, 4, 15, 9, 26};
    uint64_t vals[] = {0, 1, 2, 3, 4, 5};
    FksU64Map *m = NULL;
    CHECK(fks_u64_map_build(keys, vals, 6, 1, &m) == FKS_STATUS_OK);
    CHECK(fks_u64_map_len(m) == 6);
    for (size_t i = 0; i < 6; i++) {
        uint64_t v = 99;
        CHECK(fks_u64_map_lookup(m, keys[i], &v) == FKS_STATUS_OK);
        CHECK(v == vals[i]);
    }
    CHECK(fks_u64_map_lookup(m, 2, NULL) == FKS_STATUS_NOT_FOUND);
    CHECK(!fks_u64_map_member(m, 5));
    fks_u64_map_free(m);

    const char *words[] = {"north", "south", "east", "west"};
    const uint8_t *ptrs[4];
    size_t lens[4];
    for (size_t i = 0; i < 4; i++) {
        ptrs[i] = (const uint8_t *)words[i];
        lens[i] = strlen(words[i]);
    }
    FksStrMap *s = NULL;
    CHECK(fks_str_map_build(ptrs, lens, vals, 4, 1, &s) == FKS_STATUS_OK);
    uint64_t v = 0;
    CHECK(fks_str_map_lookup(s, (const uint8_t *)"east", 4, &v) == FKS_STATUS_OK && v == 2);
    CHECK(fks_str_map_lookup(s, (const uint8_t *)"up", 2, &v) == FKS_STATUS_NOT_FOUND);
    fks_str_map_free(s);

    CHECK(fks_u64_map_build(keys, vals, 0, 1, &m) == FKS_STATUS_EMPTY_KEYS);
    CHECK(strcmp(fks_status_message(FKS_STATUS_EMPTY_KEYS), "no keys given") == 0);
    puts("ok");
    return 0;
}
