/* Minimal C consumer: textdet-detect <image.pgm|image.png> */
#include <stdio.h>
#include <stdlib.h>

#include "textdet.h"

static unsigned char *read_all(const char *path, size_t *len) {
    FILE *f = fopen(path, "rb");
    if (!f) return NULL;
    fseek(f, 0, SEEK_END);
    long n = ftell(f);
    fseek(f, 0, SEEK_SET);
    unsigned char *buf = malloc(n > 0 ? (size_t)n : 1);
    *len = fread(buf, 1, (size_t)n, f);
    fclose(f);
    return buf;
}

int main(int argc, char **argv) {
    if (argc != 2) {
        fprintf(stderr, "usage: %s IMAGE\n", argv[0]);
        return 2;
    }
    size_t len = 0;
    unsigned char *bytes = read_all(argv[1], &len);
    if (!bytes) {
        perror(argv[1]);
        return 2;
    }
    TdImage *image = NULL;
    if (td_image_decode(bytes, len, &image) != TD_STATUS_OK) {
        fprintf(stderr, "decode failed: %s\n", td_last_error());
        free(bytes);
        return 2;
    }
    free(bytes);

    TdResult *result = NULL;
    TdStatus status = td_detect(image, NULL, &result);
    if (status != TD_STATUS_OK) {
        fprintf(stderr, "detect failed: %s\n", td_last_error());
        td_image_free(image);
        return 1;
    }
    size_t n = td_result_box_count(result);
    for (size_t i = 0; i < n; i++) {
        TdBox b;
        td_result_box(result, i, &b);
        printf("box %u %u %u %u\n", b.x, b.y, b.width, b.height);
    }
    TdBox primary;
    if (td_result_primary_box(result, &primary) == TD_STATUS_OK) {
        printf("primary %u %u %u %u\n", primary.x, primary.y, primary.width, primary.height);
    } else {
        printf("primary none\n");
    }
    td_result_free(result);
    td_image_free(image);
    return 0;
}
