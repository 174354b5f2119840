_TARGET_COLS = {TARGET}
__feature_train = __train_dataset.drop(_TARGET_COLS, axis=1)
__target_train = __train_dataset[_TARGET_COLS[0]] if len(_TARGET_COLS) == 1 else __train_dataset[_TARGET_COLS]
__feature_test = __test_dataset.drop(_TARGET_COLS, axis=1)
__target_test = __test_dataset[_TARGET_COLS[0]] if len(_TARGET_COLS) == 1 else __test_dataset[_TARGET_COLS]
# models in this pack take numeric inputs only
__feature_train = __feature_train.select_dtypes(include=[np.number])
__feature_test = __feature_test[__feature_train.columns]
