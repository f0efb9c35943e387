#include <stdio.h>
#include "cmcl.h"

int main(void) {
    double poses[3 * 64];
    for (int i = 0; i < 64; i++) {
        poses[3 * i] = 2.0 + 0.01 * i;
        poses[3 * i + 1] = 3.0 - 0.01 * i;
        poses[3 * i + 2] = 0.0;
    }
    CmclBelief *sender = NULL, *receiver = NULL;
    CmclMessage *msg = NULL;
    if (cmcl_belief_new(poses, NULL, 64, &sender) != CMCL_STATUS_OK) return 1;
    if (cmcl_belief_new(poses, NULL, 64, &receiver) != CMCL_STATUS_OK) return 2;
    if (cmcl_summarize(sender, 1.0, 0.2, 5, 3, &msg) != CMCL_STATUS_OK) return 3;
    size_t len = 0;
    if (cmcl_message_len(msg, &len) != CMCL_STATUS_OK || len == 0) return 4;
    int resampled = -1;
    if (cmcl_fuse(receiver, msg, 0.06, 4, &resampled) != CMCL_STATUS_OK) {
        fprintf(stderr, "%s\n", cmcl_last_error());
        return 5;
    }
    printf("%zu\n", len);
    cmcl_message_free(msg);
    cmcl_belief_free(sender);
    cmcl_belief_free(receiver);
    return 0;
}
