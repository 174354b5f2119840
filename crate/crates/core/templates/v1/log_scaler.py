_LOG_SCALE_COLS = {COLUMNS}
for _col in _LOG_SCALE_COLS:
    if _col in __feature_train.columns:
        __feature_train[_col] = np.sign(__feature_train[_col]) * np.log1p(np.abs(__feature_train[_col]))
        __feature_test[_col] = np.sign(__feature_test[_col]) * np.log1p(np.abs(__feature_test[_col]))
