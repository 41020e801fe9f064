metrics_description = (
    "Confusion matrix, accuracy per class, precision, recall, F1, ROC AUC with the ROC "
    "points, false negatives per manipulation method and timing for a set of predictions"
)
