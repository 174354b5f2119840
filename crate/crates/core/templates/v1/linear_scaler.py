from sklearn.preprocessing import StandardScaler

_SCALE_COLS = {COLUMNS}
_SCALE_COLS = [_c for _c in _SCALE_COLS if _c in __feature_train.columns]
if _SCALE_COLS:
    __scaler = StandardScaler()
    __feature_train[_SCALE_COLS] = __scaler.fit_transform(__feature_train[_SCALE_COLS])
    __feature_test[_SCALE_COLS] = __scaler.transform(__feature_test[_SCALE_COLS])
